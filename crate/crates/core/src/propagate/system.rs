//! Right-hand sides of the Schrödinger, non-Hermitian and master equations.

use crate::models::Generator;
use crate::qops::{Operator, SparseOperator};
use crate::{Error, Result, C64};

/// All generator terms merged row-wise into one CSR whose entries remember the
/// term they came from, so `H(t)x` is a single pass over the nonzeros.
#[derive(Clone, Debug)]
pub(crate) struct MergedTerms {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    term: Vec<usize>,
}

impl MergedTerms {
    pub fn new(terms: &[SparseOperator]) -> Result<Self> {
        let dim = terms.first().map_or(0, SparseOperator::dim);
        if let Some(bad) = terms.iter().find(|t| t.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        let mut rows: Vec<Vec<(usize, C64, usize)>> = vec![Vec::new(); dim];
        for (k, t) in terms.iter().enumerate() {
            for (i, j, v) in t.entries() {
                rows[i].push((j, v, k));
            }
        }
        let mut m = MergedTerms { dim, row_ptr: vec![0], cols: Vec::new(), vals: Vec::new(), term: Vec::new() };
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (j, v, k) in r {
                m.cols.push(j);
                m.vals.push(v);
                m.term.push(k);
            }
            m.row_ptr.push(m.cols.len());
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `y += c·H x` with `H = Σ coeffs[k] A_k`.
    #[inline]
    pub fn apply_add(&self, coeffs: &[C64], c: C64, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += coeffs[self.term[p]] * self.vals[p] * x[self.cols[p]];
            }
            *yi += c * acc;
        }
    }
}

/// An ODE `dx/dt = f(t, x)` on a flat complex vector, smooth inside `piece`.
pub(crate) trait OdeSystem {
    fn len(&self) -> usize;
    fn rhs(&mut self, t: f64, piece: usize, x: &[C64], out: &mut [C64]);
}

/// i dψ/dt = (H(t) − (i/2)K)ψ, with K = Σ L†L absent for closed systems.
pub(crate) struct Schrodinger<'a> {
    generator: &'a dyn Generator,
    merged: MergedTerms,
    coeffs: Vec<C64>,
    damping: Option<SparseOperator>,
}

impl<'a> Schrodinger<'a> {
    pub fn new(generator: &'a dyn Generator, damping: Option<&Operator>) -> Result<Self> {
        let merged = MergedTerms::new(generator.terms())?;
        Ok(Schrodinger {
            generator,
            coeffs: vec![C64::new(0.0, 0.0); generator.terms().len()],
            merged,
            damping: damping.map(SparseOperator::from_operator),
        })
    }
}

impl OdeSystem for Schrodinger<'_> {
    fn len(&self) -> usize {
        self.merged.dim()
    }

    fn rhs(&mut self, t: f64, piece: usize, x: &[C64], out: &mut [C64]) {
        self.generator.coefficients(t, piece, &mut self.coeffs);
        out.fill(C64::new(0.0, 0.0));
        self.merged.apply_add(&self.coeffs, C64::new(0.0, -1.0), x, out);
        if let Some(k) = &self.damping {
            k.apply_add(C64::new(-0.5, 0.0), x, out);
        }
    }
}

/// dρ/dt = −i[H, ρ] + Σ (LρL† − ½{L†L, ρ}) on a column-major ρ.
///
/// Hermiticity of ρ is used throughout: ρH = (Hρ)† and ρL† = (Lρ)†. The
/// input is Hermitized first; otherwise round-off in the anti-Hermitian part
/// sees a map that is not a master equation and grows exponentially at large
/// dissipation rates.
pub(crate) struct Lindblad<'a> {
    generator: &'a dyn Generator,
    merged: MergedTerms,
    coeffs: Vec<C64>,
    jumps: Vec<SparseOperator>,
    damping: Option<SparseOperator>,
    scratch: Vec<C64>,
    scratch2: Vec<C64>,
    herm: Vec<C64>,
}

impl<'a> Lindblad<'a> {
    pub fn new(generator: &'a dyn Generator, jumps: &[Operator]) -> Result<Self> {
        let merged = MergedTerms::new(generator.terms())?;
        let n = merged.dim();
        let damping = if jumps.is_empty() {
            None
        } else {
            let layout = generator.layout();
            let mut k = Operator::zeros(layout);
            for l in jumps {
                k = &k + &(&l.adjoint() * l);
            }
            Some(SparseOperator::from_operator(&k))
        };
        Ok(Lindblad {
            generator,
            coeffs: vec![C64::new(0.0, 0.0); generator.terms().len()],
            merged,
            jumps: jumps.iter().map(SparseOperator::from_operator).collect(),
            damping,
            scratch: vec![C64::new(0.0, 0.0); n * n],
            scratch2: vec![C64::new(0.0, 0.0); n * n],
            herm: vec![C64::new(0.0, 0.0); n * n],
        })
    }
}

/// `out += c·M + conj(c)·M†` for column-major `n×n` M.
fn add_with_adjoint(n: usize, c: C64, m: &[C64], out: &mut [C64]) {
    for j in 0..n {
        for i in 0..n {
            out[j * n + i] += c * m[j * n + i] + c.conj() * m[i * n + j].conj();
        }
    }
}

impl OdeSystem for Lindblad<'_> {
    fn len(&self) -> usize {
        self.merged.dim() * self.merged.dim()
    }

    fn rhs(&mut self, t: f64, piece: usize, x: &[C64], out: &mut [C64]) {
        let n = self.merged.dim();
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        self.generator.coefficients(t, piece, &mut self.coeffs);
        out.fill(zero);
        for j in 0..n {
            for i in 0..n {
                self.herm[j * n + i] = 0.5 * (x[j * n + i] + x[i * n + j].conj());
            }
        }
        let x = &self.herm;

        // −iHρ + iρH
        self.scratch.fill(zero);
        for j in 0..n {
            let col = &x[j * n..(j + 1) * n];
            self.merged.apply_add(&self.coeffs, one, col, &mut self.scratch[j * n..(j + 1) * n]);
        }
        add_with_adjoint(n, C64::new(0.0, -1.0), &self.scratch, out);

        if let Some(k) = &self.damping {
            self.scratch.fill(zero);
            for j in 0..n {
                k.apply_add(one, &x[j * n..(j + 1) * n], &mut self.scratch[j * n..(j + 1) * n]);
            }
            add_with_adjoint(n, C64::new(-0.5, 0.0), &self.scratch, out);
        }

        for l in &self.jumps {
            // M = Lρ, then L·M† = LρL†
            self.scratch.fill(zero);
            for j in 0..n {
                l.apply_add(one, &x[j * n..(j + 1) * n], &mut self.scratch[j * n..(j + 1) * n]);
            }
            for j in 0..n {
                for i in 0..n {
                    self.scratch2[j * n + i] = self.scratch[i * n + j].conj();
                }
            }
            for j in 0..n {
                l.apply_add(one, &self.scratch2[j * n..(j + 1) * n], &mut out[j * n..(j + 1) * n]);
            }
        }
    }
}
