//! Block-sparse matrices with 2×2 complex blocks, one block row per vertex.

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

use crate::clifford::Endo;
use crate::C64;

/// Compressed sparse row matrix of 2×2 blocks.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    blocks: Vec<Endo>,
}

impl BlockMatrix {
    /// Sums duplicate entries in input order, so the result is independent of thread scheduling.
    pub(crate) fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, Endo)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut blocks: Vec<Endo> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, b) in triplets {
            if last == Some((i, j)) {
                *blocks.last_mut().expect("previous block") += b;
            } else {
                row_ptr[i + 1] += 1;
                cols.push(j);
                blocks.push(b);
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            cols,
            blocks,
        }
    }

    /// Number of block rows (vertices).
    pub fn block_dim(&self) -> usize {
        self.n
    }

    /// Number of stored blocks.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Iterates over stored `(row, col, block)` entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Endo)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], &self.blocks[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Endo> {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|k| &self.blocks[range.start + k])
    }

    /// `y = A x` on flat vectors of length `2n`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), 2 * self.n);
        assert_eq!(y.len(), 2 * self.n);
        y.par_chunks_mut(2).enumerate().for_each(|(i, out)| {
            let mut acc = [C64::new(0.0, 0.0); 2];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let (b, j) = (&self.blocks[k], self.cols[k]);
                acc[0] += b[(0, 0)] * x[2 * j] + b[(0, 1)] * x[2 * j + 1];
                acc[1] += b[(1, 0)] * x[2 * j] + b[(1, 1)] * x[2 * j + 1];
            }
            out.copy_from_slice(&acc);
        });
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖A - A*‖_F / ‖A‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut sq = 0.0;
        for (i, j, b) in self.iter() {
            sq += match self.get(j, i) {
                Some(t) => (b - t.adjoint()).norm_squared(),
                None => 2.0 * b.norm_squared(),
            };
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            0.0
        } else {
            sq.sqrt() / norm
        }
    }

    /// `‖A - B‖_F` for matrices of the same block dimension.
    pub fn distance(&self, other: &BlockMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        let mut triplets: Vec<(usize, usize, Endo)> =
            self.iter().map(|(i, j, b)| (i, j, *b)).collect();
        triplets.extend(other.iter().map(|(i, j, b)| (i, j, -b)));
        BlockMatrix::from_triplets(self.n, triplets).frobenius_norm()
    }

    /// Scalar entries `(row, col, value)` of `S A S` with `S = diag(scale)` on block rows.
    fn scalar_entries<'a>(
        &'a self,
        scale: &'a [f64],
    ) -> impl Iterator<Item = (usize, usize, C64)> + 'a {
        self.iter().flat_map(move |(i, j, b)| {
            let s = scale[i] * scale[j];
            (0..2).flat_map(move |r| (0..2).map(move |c| (2 * i + r, 2 * j + c, b[(r, c)] * s)))
        })
    }

    /// Expands to a faer sparse matrix of size `2n × 2n`, scaled by `diag(scale)` on both sides.
    pub fn to_sparse(&self, scale: &[f64]) -> SparseColMat<usize, C64> {
        let triplets: Vec<Triplet<usize, usize, C64>> = self
            .scalar_entries(scale)
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        SparseColMat::try_new_from_triplets(2 * self.n, 2 * self.n, &triplets)
            .expect("block entries are unique and in range")
    }

    /// Expands to a dense `2n × 2n` matrix, scaled by `diag(scale)` on both sides.
    pub fn to_dense(&self, scale: &[f64]) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(2 * self.n, 2 * self.n);
        for (r, c, v) in self.scalar_entries(scale) {
            m[(r, c)] = v;
        }
        m
    }
}
