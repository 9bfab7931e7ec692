use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordered subsystem dimensions of a composite Hilbert space.
///
/// The canonical order is (qubit₁, qubit₂, c.m. mode, breathing mode); the
/// first subsystem is the most significant index of the Kronecker product.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertLayout {
    dims: Vec<usize>,
}

impl HilbertLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Layout("layout needs at least one subsystem".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::Layout(format!("subsystem dimension {d} must be >= 1")));
        }
        Ok(Self { dims })
    }

    /// A single subsystem of dimension `dim`.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    /// Two qubits.
    pub fn qubits() -> Self {
        Self { dims: vec![2, 2] }
    }

    /// Two qubits and the c.m. mode.
    pub fn qubits_cm(n_cm: usize) -> Result<Self> {
        Self::new(vec![2, 2, n_cm])
    }

    /// Two qubits, the c.m. mode, and the breathing mode.
    pub fn qubits_cm_br(n_cm: usize, n_br: usize) -> Result<Self> {
        Self::new(vec![2, 2, n_cm, n_br])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dim(&self, subsystem: usize) -> usize {
        self.dims[subsystem]
    }

    /// True when the first two subsystems are qubits.
    pub fn has_qubit_pair(&self) -> bool {
        self.dims.len() >= 2 && self.dims[0] == 2 && self.dims[1] == 2
    }

    pub fn concat(&self, other: &HilbertLayout) -> HilbertLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        HilbertLayout { dims }
    }

    /// Layout of the listed subsystems, in the order given.
    pub fn select(&self, keep: &[usize]) -> Result<HilbertLayout> {
        if keep.is_empty() {
            return Err(Error::Layout("no subsystems selected".into()));
        }
        let mut dims = Vec::with_capacity(keep.len());
        for (i, &k) in keep.iter().enumerate() {
            if k >= self.dims.len() {
                return Err(Error::Layout(format!(
                    "subsystem index {k} out of range for {} subsystems",
                    self.dims.len()
                )));
            }
            if keep[..i].contains(&k) {
                return Err(Error::Layout(format!("subsystem index {k} repeated")));
            }
            dims.push(self.dims[k]);
        }
        Ok(HilbertLayout { dims })
    }

    /// Row-major strides: `index = Σ digit[k]·stride[k]`.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Decomposes a flat index into per-subsystem digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }

    pub fn flat_index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&d, &n)| acc * n + d)
    }
}
