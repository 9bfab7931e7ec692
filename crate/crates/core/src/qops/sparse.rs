use nalgebra::{DMatrix, DVector};

use super::Operator;
use crate::C64;

/// Compressed-row copy of an [`Operator`] used inside integrator loops.
///
/// Every generator in this crate is a handful of Kronecker products of
/// Pauli and ladder matrices, so the row structure is extremely sparse.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn from_operator(op: &Operator) -> Self {
        Self::from_dense(op.matrix())
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries as (row, column, value) in row order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    /// `y += c · A x`
    #[inline]
    pub fn apply_add(&self, c: C64, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi += c * acc;
        }
    }

    /// `Y += c · A X` for a column-major dense `X`.
    pub fn apply_add_matrix(&self, c: C64, x: &DMatrix<C64>, y: &mut DMatrix<C64>) {
        for j in 0..x.ncols() {
            let xc = x.column(j);
            let mut yc = y.column_mut(j);
            for i in 0..self.dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[k] * xc[self.cols[k]];
                }
                yc[i] += c * acc;
            }
        }
    }

    /// `Y += c · X A` for a column-major dense `X`.
    pub fn apply_add_matrix_right(&self, c: C64, x: &DMatrix<C64>, y: &mut DMatrix<C64>) {
        // (X A)[:, j] = Σ_k X[:, k] A[k, j]
        for k in 0..self.dim {
            for p in self.row_ptr[k]..self.row_ptr[k + 1] {
                let j = self.cols[p];
                let a = c * self.vals[p];
                let xc = x.column(k);
                let mut yc = y.column_mut(j);
                for i in 0..x.nrows() {
                    yc[i] += a * xc[i];
                }
            }
        }
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.dim);
        self.apply_add(C64::new(1.0, 0.0), x.as_slice(), y.as_mut_slice());
        y
    }

    /// Upper bound on the spectral norm, √(‖A‖₁‖A‖_∞).
    pub fn norm_bound(&self) -> f64 {
        let mut col = vec![0.0; self.dim];
        let mut row_max = 0.0f64;
        for i in 0..self.dim {
            let mut r = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.vals[k].norm();
                r += a;
                col[self.cols[k]] += a;
            }
            row_max = row_max.max(r);
        }
        let col_max = col.into_iter().fold(0.0, f64::max);
        (row_max * col_max).sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] = self.vals[k];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{collective_spin, mode_op, HilbertLayout, SpinAxis};

    #[test]
    fn sparse_products_match_dense() {
        let l = HilbertLayout::qubits_cm(4).unwrap();
        let a = mode_op(2, &l).unwrap();
        let op = &(&a * &collective_spin(SpinAxis::Z, &l).unwrap()) + &collective_spin(SpinAxis::Plus, &l).unwrap();
        let s = SparseOperator::from_operator(&op);
        assert_eq!(s.to_dense(), *op.matrix());
        let x = DMatrix::from_fn(16, 16, |i, j| C64::new((i * 3 + j) as f64 * 0.1, (j as f64).sin()));
        let mut y = DMatrix::zeros(16, 16);
        s.apply_add_matrix(C64::new(0.0, 2.0), &x, &mut y);
        let expect = op.matrix() * &x * C64::new(0.0, 2.0);
        assert!((y - expect).iter().all(|z| z.norm() < 1e-12));
        let mut y = DMatrix::zeros(16, 16);
        s.apply_add_matrix_right(C64::new(1.5, 0.0), &x, &mut y);
        let expect = &x * op.matrix() * C64::new(1.5, 0.0);
        assert!((y - expect).iter().all(|z| z.norm() < 1e-12));
        let v = DVector::from_fn(16, |i, _| C64::new(i as f64, 1.0));
        assert!((s.apply(&v) - op.matrix() * &v).iter().all(|z| z.norm() < 1e-12));
    }
}
