use alloc::vec;
use alloc::vec::Vec;

use super::{CMatrix, CsrMatrix, LinalgError, Lu, C64};

struct Block {
    indices: Vec<usize>,
    lu: Lu,
}

/// Block forward Gauss-Seidel sweep used as a preconditioner.
///
/// The unknowns are partitioned into blocks processed in a fixed order.
/// Diagonal blocks are factored densely; couplings to earlier blocks are
/// kept, couplings to later blocks are dropped. For a matrix that is block
/// lower-triangular up to a small remainder this is a near-exact inverse.
pub struct BlockGaussSeidel {
    blocks: Vec<Block>,
    lower: CsrMatrix,
}

impl BlockGaussSeidel {
    /// `labels[i]` is the block of unknown `i`; blocks are processed in
    /// increasing label order.
    pub fn new(a: &CsrMatrix, labels: &[usize]) -> Result<Self, LinalgError> {
        let n = a.nrows();
        if a.ncols() != n || labels.len() != n {
            return Err(LinalgError::ShapeMismatch {
                expected: (n, n),
                found: (a.ncols(), labels.len()),
            });
        }
        let nblocks = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); nblocks];
        let mut local = vec![0usize; n];
        for (i, &l) in labels.iter().enumerate() {
            local[i] = members[l].len();
            members[l].push(i);
        }
        let mut dense: Vec<CMatrix> = members.iter().map(|m| CMatrix::zeros(m.len(), m.len())).collect();
        let mut lower = Vec::new();
        for i in 0..n {
            let li = labels[i];
            for (j, v) in a.row(i) {
                let lj = labels[j];
                if lj == li {
                    dense[li][(local[i], local[j])] += v;
                } else if lj < li {
                    lower.push((i, j, v));
                }
            }
        }
        let mut blocks = Vec::with_capacity(nblocks);
        for (indices, m) in members.into_iter().zip(dense) {
            if indices.is_empty() {
                continue;
            }
            let lu = Lu::factor(&m)?;
            blocks.push(Block { indices, lu });
        }
        Ok(Self {
            blocks,
            lower: CsrMatrix::from_triplets(n, n, &mut lower),
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn largest_block(&self) -> usize {
        self.blocks.iter().map(|b| b.indices.len()).max().unwrap_or(0)
    }

    /// Writes the forward sweep applied to `r` into `z`.
    pub fn apply(&self, r: &[C64], z: &mut [C64]) {
        for v in z.iter_mut() {
            *v = C64::new(0.0, 0.0);
        }
        let mut buf = Vec::new();
        for b in &self.blocks {
            buf.clear();
            for &i in &b.indices {
                let mut s = r[i];
                for (j, v) in self.lower.row(i) {
                    s -= v * z[j];
                }
                buf.push(s);
            }
            b.lu.solve_in_place(&mut buf);
            for (&i, v) in b.indices.iter().zip(&buf) {
                z[i] = *v;
            }
        }
    }
}
