//! Compressed sparse row matrices for operator assembly.
//!
//! Every constructor leaves column indices ascending within each row and
//! merges duplicates by addition, so equal inputs produce byte-equal
//! structures and all downstream arithmetic is deterministic. Entries that
//! merge or multiply to exactly zero are dropped; nothing is thresholded.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Build from per-row entry lists `(col, value)`. Rows may be unsorted
    /// and contain duplicate columns.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let nrows = rows.len();
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if c >= ncols {
                    return Err(Error::SizeMismatch(format!(
                        "column {c} out of range in row {i} ({ncols} columns)"
                    )));
                }
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            // drop entries that cancelled to exact zero during the merge
            let start = indptr[i];
            let mut keep = start;
            for k in start..indices.len() {
                if values[k] != 0.0 {
                    indices[keep] = indices[k];
                    values[keep] = values[k];
                    keep += 1;
                }
            }
            indices.truncate(keep);
            values.truncate(keep);
            indptr.push(indices.len());
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![Vec::new(); nrows];
        for &(r, c, v) in triplets {
            if r >= nrows {
                return Err(Error::SizeMismatch(format!(
                    "row {r} out of range ({nrows} rows)"
                )));
            }
            rows[r].push((c, v));
        }
        Self::from_rows(ncols, rows)
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "mul_vec length mismatch");
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[i] = acc;
        }
        y
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "transpose_mul_vec length mismatch");
        let mut y = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let xi = x[i];
            for (c, v) in cols.iter().zip(vals) {
                y[*c] += v * xi;
            }
        }
        y
    }

    /// Counting-sort transpose; row-major traversal keeps the transposed
    /// rows sorted.
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for k in 0..self.ncols {
            counts[k + 1] += counts[k];
        }
        let indptr = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = counts;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let slot = next[*c];
                indices[slot] = i;
                values[slot] = *v;
                next[*c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr,
            indices,
            values,
        }
    }

    /// Row-by-row product with a dense accumulator per output row.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut acc = vec![0.0f64; other.ncols];
        let mut touched = vec![false; other.ncols];
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut cols_buf = Vec::new();
        for i in 0..self.nrows {
            cols_buf.clear();
            let (acols, avals) = self.row(i);
            for (ac, av) in acols.iter().zip(avals) {
                let (bcols, bvals) = other.row(*ac);
                for (bc, bv) in bcols.iter().zip(bvals) {
                    if !touched[*bc] {
                        touched[*bc] = true;
                        cols_buf.push(*bc);
                    }
                    acc[*bc] += av * bv;
                }
            }
            cols_buf.sort_unstable();
            for &c in &cols_buf {
                if acc[c] != 0.0 {
                    indices.push(c);
                    values.push(acc[c]);
                }
                acc[c] = 0.0;
                touched[c] = false;
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: other.ncols,
            indptr,
            indices,
            values,
        })
    }

    /// `alpha * self + beta * other` with merged sparsity.
    pub fn add_scaled(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "sum of {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                let (c, v) = if q >= bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    let e = (ac[p], alpha * av[p]);
                    p += 1;
                    e
                } else if p >= ac.len() || bc[q] < ac[p] {
                    let e = (bc[q], beta * bv[q]);
                    q += 1;
                    e
                } else {
                    let e = (ac[p], alpha * av[p] + beta * bv[q]);
                    p += 1;
                    q += 1;
                    e
                };
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.nrows, "scale_rows length mismatch");
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out.values[k] *= d[i];
            }
        }
        out
    }

    /// New matrix holding the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for &r in rows {
            let (cols, vals) = self.row(r);
            indices.extend_from_slice(cols);
            values.extend_from_slice(vals);
            indptr.push(indices.len());
        }
        Self {
            nrows: rows.len(),
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }

    /// Horizontal concatenation `[a | b | ...]`.
    pub fn hstack(blocks: &[&Self]) -> Result<Self> {
        assert!(!blocks.is_empty());
        let nrows = blocks[0].nrows;
        for b in blocks {
            if b.nrows != nrows {
                return Err(Error::DimensionMismatch(
                    "hstack blocks disagree on row count".into(),
                ));
            }
        }
        let ncols = blocks.iter().map(|b| b.ncols).sum();
        let nnz = blocks.iter().map(|b| b.nnz()).sum();
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for i in 0..nrows {
            let mut offset = 0;
            for b in blocks {
                let (cols, vals) = b.row(i);
                indices.extend(cols.iter().map(|c| c + offset));
                values.extend_from_slice(vals);
                offset += b.ncols;
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// Vertical concatenation.
    pub fn vstack(blocks: &[&Self]) -> Result<Self> {
        assert!(!blocks.is_empty());
        let ncols = blocks[0].ncols;
        for b in blocks {
            if b.ncols != ncols {
                return Err(Error::DimensionMismatch(
                    "vstack blocks disagree on column count".into(),
                ));
            }
        }
        let nrows = blocks.iter().map(|b| b.nrows).sum();
        let nnz = blocks.iter().map(|b| b.nnz()).sum();
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for b in blocks {
            for i in 0..b.nrows {
                let (cols, vals) = b.row(i);
                indices.extend_from_slice(cols);
                values.extend_from_slice(vals);
                indptr.push(indices.len());
            }
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// `[[a, 0], [0, b]]`.
    pub fn block_diag2(a: &Self, b: &Self) -> Self {
        let nrows = a.nrows + b.nrows;
        let ncols = a.ncols + b.ncols;
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(a.nnz() + b.nnz());
        let mut values = Vec::with_capacity(a.nnz() + b.nnz());
        indptr.extend_from_slice(&a.indptr);
        indices.extend_from_slice(&a.indices);
        values.extend_from_slice(&a.values);
        for i in 0..b.nrows {
            let (cols, vals) = b.row(i);
            indices.extend(cols.iter().map(|c| c + a.ncols));
            values.extend_from_slice(vals);
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                m[(i, *c)] = *v;
            }
        }
        m
    }

    /// One-based coordinate Matrix Market output; floats print in shortest
    /// round-trip form so repeated runs emit identical bytes.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {}", i + 1, c + 1, v)?;
            }
        }
        Ok(())
    }

    #[cfg(feature = "direct")]
    pub fn to_faer(&self) -> faer::sparse::SparseColMat<usize, f64> {
        use faer::sparse::{SparseColMat, Triplet};
        let mut trip = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                trip.push(Triplet::new(i, *c, *v));
            }
        }
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trip)
            .expect("CSR invariants guarantee valid triplets")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(nrows: usize, ncols: usize, fill: f64, seed: u64) -> SparseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(nrows);
        for _ in 0..nrows {
            let mut row = Vec::new();
            for c in 0..ncols {
                if rng.random::<f64>() < fill {
                    row.push((c, rng.random::<f64>() * 2.0 - 1.0));
                }
            }
            rows.push(row);
        }
        SparseOperator::from_rows(ncols, rows).unwrap()
    }

    #[test]
    fn from_rows_sorts_merges_and_drops_zeros() {
        let m = SparseOperator::from_rows(
            4,
            vec![
                vec![(2, 1.0), (0, 3.0), (2, -1.0), (1, 0.5)],
                vec![],
                vec![(3, 2.0), (3, 2.0)],
            ],
        )
        .unwrap();
        assert_eq!(m.nrows(), 3);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.row(0), (&[0usize, 1][..], &[3.0, 0.5][..]));
        assert_eq!(m.row(1), (&[][..], &[][..]));
        assert_eq!(m.row(2), (&[3usize][..], &[4.0][..]));
        assert!(SparseOperator::from_rows(2, vec![vec![(2, 1.0)]]).is_err());
    }

    #[test]
    fn mul_vec_matches_dense() {
        let m = random_sparse(17, 11, 0.3, 1);
        let x: Vec<f64> = (0..11).map(|i| (i as f64).sin()).collect();
        let y = m.mul_vec(&x);
        let dense = m.to_dense() * nalgebra::DVector::from_column_slice(&x);
        for i in 0..17 {
            assert_relative_eq!(y[i], dense[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn transpose_roundtrip_and_adjoint_identity() {
        let m = random_sparse(13, 19, 0.25, 2);
        let t = m.transpose();
        assert_eq!(t.transpose(), m);
        // <Mx, y> == <x, M^T y>
        let x: Vec<f64> = (0..19).map(|i| (i as f64 * 0.7).cos()).collect();
        let y: Vec<f64> = (0..13).map(|i| (i as f64 * 1.3).sin()).collect();
        let lhs: f64 = m.mul_vec(&x).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(t.mul_vec(&y)).map(|(a, b)| a * b).sum();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
        assert_eq!(m.transpose_mul_vec(&y), t.mul_vec(&y));
    }

    #[test]
    fn matmul_matches_dense_product() {
        let a = random_sparse(9, 14, 0.3, 3);
        let b = random_sparse(14, 7, 0.3, 4);
        let c = a.matmul(&b).unwrap();
        let dense = a.to_dense() * b.to_dense();
        assert_relative_eq!((c.to_dense() - dense).norm(), 0.0, epsilon = 1e-13);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn add_scaled_matches_dense() {
        let a = random_sparse(8, 8, 0.3, 5);
        let b = random_sparse(8, 8, 0.3, 6);
        let c = a.add_scaled(2.0, &b, -0.5).unwrap();
        let dense = a.to_dense() * 2.0 - b.to_dense() * 0.5;
        assert_relative_eq!((c.to_dense() - dense).norm(), 0.0, epsilon = 1e-14);
        // exact cancellation leaves no stored entry
        let z = a.add_scaled(1.0, &a, -1.0).unwrap();
        assert_eq!(z.nnz(), 0);
    }

    #[test]
    fn stacking_and_block_diagonal() {
        let a = random_sparse(5, 4, 0.4, 7);
        let b = random_sparse(5, 3, 0.4, 8);
        let h = SparseOperator::hstack(&[&a, &b]).unwrap();
        assert_eq!((h.nrows(), h.ncols()), (5, 7));
        let mut dense = DMatrix::zeros(5, 7);
        dense.view_mut((0, 0), (5, 4)).copy_from(&a.to_dense());
        dense.view_mut((0, 4), (5, 3)).copy_from(&b.to_dense());
        assert_eq!(h.to_dense(), dense);

        let c = random_sparse(2, 4, 0.4, 9);
        let v = SparseOperator::vstack(&[&a, &c]).unwrap();
        assert_eq!((v.nrows(), v.ncols()), (7, 4));
        let mut dense = DMatrix::zeros(7, 4);
        dense.view_mut((0, 0), (5, 4)).copy_from(&a.to_dense());
        dense.view_mut((5, 0), (2, 4)).copy_from(&c.to_dense());
        assert_eq!(v.to_dense(), dense);

        let d = SparseOperator::block_diag2(&a, &b);
        assert_eq!((d.nrows(), d.ncols()), (10, 7));
        let mut dense = DMatrix::zeros(10, 7);
        dense.view_mut((0, 0), (5, 4)).copy_from(&a.to_dense());
        dense.view_mut((5, 4), (5, 3)).copy_from(&b.to_dense());
        assert_eq!(d.to_dense(), dense);

        assert!(SparseOperator::hstack(&[&a, &c]).is_err());
        assert!(SparseOperator::vstack(&[&a, &b]).is_err());
    }

    #[test]
    fn select_rows_reorders_and_repeats() {
        let a = random_sparse(5, 4, 0.5, 12);
        let s = a.select_rows(&[3, 0, 3]);
        assert_eq!(s.nrows(), 3);
        assert_eq!(s.row(0), a.row(3));
        assert_eq!(s.row(1), a.row(0));
        assert_eq!(s.row(2), a.row(3));
    }

    #[test]
    fn scale_rows_matches_dense() {
        let a = random_sparse(6, 5, 0.5, 10);
        let d = [1.0, -2.0, 0.5, 0.0, 3.0, 1.5];
        let s = a.scale_rows(&d);
        let dense = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&d)) * a.to_dense();
        assert_relative_eq!((s.to_dense() - dense).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn matrix_market_output_is_frozen() {
        let m = SparseOperator::from_triplets(2, 3, &[(0, 0, 1.5), (1, 2, -0.25), (0, 1, 2.0)]).unwrap();
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "%%MatrixMarket matrix coordinate real general\n2 3 3\n1 1 1.5\n1 2 2\n2 3 -0.25\n"
        );
    }

    #[cfg(feature = "direct")]
    #[test]
    fn faer_bridge_preserves_action() {
        let a = random_sparse(10, 6, 0.4, 11);
        let f = a.to_faer();
        let x: Vec<f64> = (0..6).map(|i| i as f64 + 0.5).collect();
        let fx = &f * faer::Mat::<f64>::from_fn(6, 1, |i, _| x[i]);
        let y = a.mul_vec(&x);
        for i in 0..10 {
            assert_relative_eq!(fx[(i, 0)], y[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn identity_and_zeros() {
        let i = SparseOperator::identity(4);
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(i.mul_vec(&x), x.to_vec());
        let z = SparseOperator::zeros(3, 4);
        assert_eq!(z.mul_vec(&x), vec![0.0; 3]);
    }
}
