//! Dense exact linear algebra over the rational-function field.
//!
//! Everything here is fraction-free in spirit: pivots prefer entries with few
//! terms, and all arithmetic stays in canonical form, so reduced row echelon
//! output is unique for a given column order.

use crate::scalars::{Scalar, ScalarError};
use std::sync::Arc;

/// Row-major dense matrix over the scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zero(space: &Arc<crate::scalars::ParameterSpace>, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Scalar::zero(space); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn identity(space: &Arc<crate::scalars::ParameterSpace>, n: usize) -> Self {
        let mut m = Matrix::zero(space, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Scalar::one(space);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// In-place reduced row echelon form, processing columns left to right.
    /// Returns the pivot columns in order.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // Prefer the structurally simplest nonzero pivot to slow down
            // coefficient growth.
            let mut best: Option<(usize, usize)> = None;
            for i in r..self.rows {
                let entry = self.at(i, c);
                if !entry.is_zero() {
                    let w = entry.complexity();
                    if best.map_or(true, |(_, bw)| w < bw) {
                        best = Some((i, w));
                    }
                }
            }
            let Some((p, _)) = best else { continue };
            self.swap_rows(r, p);
            let inv = self.at(r, c).inv().expect("nonzero pivot");
            for j in c..self.cols {
                let v = self.at(r, j).mul(&inv);
                *self.at_mut(r, j) = v;
            }
            for i in 0..self.rows {
                if i != r && !self.at(i, c).is_zero() {
                    let f = self.at(i, c).clone();
                    for j in c..self.cols {
                        let v = self.at(i, j).sub(&f.mul(self.at(r, j)));
                        *self.at_mut(i, j) = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Determinant by fraction-preserving Gaussian elimination.
    pub fn determinant(&self) -> Scalar {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let space = self.space();
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Scalar::one(&space);
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.at(i, c).is_zero()) else {
                return Scalar::zero(&space);
            };
            if p != c {
                m.swap_rows(c, p);
                det = det.neg();
            }
            let pivot = m.at(c, c).clone();
            det = det.mul(&pivot);
            let inv = pivot.inv().expect("nonzero pivot");
            for i in c + 1..n {
                if !m.at(i, c).is_zero() {
                    let f = m.at(i, c).mul(&inv);
                    for j in c..n {
                        let v = m.at(i, j).sub(&f.mul(m.at(c, j)));
                        *m.at_mut(i, j) = v;
                    }
                }
            }
        }
        det
    }

    /// Inverse of a square matrix, or SingularMatrix via DivisionByZero.
    pub fn inverse(&self) -> Result<Matrix, ScalarError> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let space = self.space();
        let n = self.rows;
        let mut aug = Matrix::zero(&space, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            *aug.at_mut(i, n + i) = Scalar::one(&space);
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(ScalarError::DivisionByZero);
        }
        let mut out = Matrix::zero(&space, n, n);
        for i in 0..n {
            for j in 0..n {
                *out.at_mut(i, j) = aug.at(i, n + j).clone();
            }
        }
        Ok(out)
    }

    /// Basis of the right nullspace {x : A·x = 0}.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let space = self.space();
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![Scalar::zero(&space); self.cols];
            v[f] = Scalar::one(&space);
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = m.at(r, f).neg();
            }
            basis.push(v);
        }
        basis
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let space = self.space();
        let mut out = Matrix::zero(&space, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        let v = out.at(i, j).add(&a.mul(b));
                        *out.at_mut(i, j) = v;
                    }
                }
            }
        }
        out
    }

    fn space(&self) -> Arc<crate::scalars::ParameterSpace> {
        assert!(!self.data.is_empty(), "empty matrix has no parameter space");
        self.data[0].space().clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::ParameterSpace;

    fn s(sp: &Arc<ParameterSpace>, text: &str) -> Scalar {
        Scalar::parse(sp, text).unwrap()
    }

    #[test]
    fn rref_identifies_pivots_and_reduces() {
        let sp = ParameterSpace::new(&["q"]);
        let mut m = Matrix::from_rows(vec![
            vec![s(&sp, "1"), s(&sp, "q"), s(&sp, "0")],
            vec![s(&sp, "q^-1"), s(&sp, "1"), s(&sp, "0")],
            vec![s(&sp, "0"), s(&sp, "0"), s(&sp, "q-1")],
        ]);
        let pivots = m.rref();
        assert_eq!(pivots, vec![0, 2]);
        assert_eq!(m.at(0, 1), &s(&sp, "q"));
        assert!(m.at(1, 0).is_zero() && m.at(1, 1).is_zero());
    }

    #[test]
    fn determinant_and_inverse() {
        let sp = ParameterSpace::new(&["q"]);
        let m = Matrix::from_rows(vec![
            vec![s(&sp, "q"), s(&sp, "1")],
            vec![s(&sp, "1"), s(&sp, "q^-1")],
        ]);
        assert!(m.determinant().is_zero());
        assert!(m.inverse().is_err());

        let m = Matrix::from_rows(vec![
            vec![s(&sp, "q"), s(&sp, "1")],
            vec![s(&sp, "1"), s(&sp, "q")],
        ]);
        assert_eq!(m.determinant(), s(&sp, "q^2 - 1"));
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        let id = Matrix::identity(&sp, 2);
        assert_eq!(prod, id);
    }

    #[test]
    fn nullspace_vectors_annihilate() {
        let sp = ParameterSpace::new(&["q"]);
        let m = Matrix::from_rows(vec![
            vec![s(&sp, "1"), s(&sp, "q"), s(&sp, "q^2")],
            vec![s(&sp, "q"), s(&sp, "q^2"), s(&sp, "q^3")],
        ]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for i in 0..m.rows() {
                let mut acc = Scalar::zero(&sp);
                for j in 0..m.cols() {
                    acc = acc.add(&m.at(i, j).mul(&v[j]));
                }
                assert!(acc.is_zero(), "nullspace vector fails to annihilate");
            }
        }
    }
}
