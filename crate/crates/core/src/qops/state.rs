use nalgebra::{DMatrix, DVector};

use super::{HilbertLayout, Operator};
use crate::{Error, Result, C64};

pub const NORM_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;
/// Eigenvalue floor accepted as positive semidefinite.
pub const POSITIVITY_FLOOR: f64 = -1e-10;

/// Qubit basis states; index 0 is |e⟩, index 1 is |g⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitState {
    Excited,
    Ground,
}

impl QubitState {
    pub fn index(self) -> usize {
        match self {
            QubitState::Excited => 0,
            QubitState::Ground => 1,
        }
    }
}

/// Pure state on a composite Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: HilbertLayout,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(layout: HilbertLayout, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != layout.total() {
            return Err(Error::DimensionMismatch { expected: layout.total(), found: amps.len() });
        }
        Ok(Self { layout, amps })
    }

    /// Like [`StateVector::new`] but also checks the norm.
    pub fn normalized_checked(layout: HilbertLayout, amps: DVector<C64>) -> Result<Self> {
        let s = Self::new(layout, amps)?;
        let n = s.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!("state norm {n} differs from 1")));
        }
        Ok(s)
    }

    /// Product basis state with the given digit per subsystem.
    pub fn basis(layout: &HilbertLayout, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.subsystems() {
            return Err(Error::DimensionMismatch { expected: layout.subsystems(), found: digits.len() });
        }
        if let Some((k, _)) = digits.iter().enumerate().find(|(k, &d)| d >= layout.dim(*k)) {
            return Err(Error::Layout(format!("digit out of range for subsystem {k}")));
        }
        let mut amps = DVector::zeros(layout.total());
        amps[layout.flat_index(digits)] = C64::new(1.0, 0.0);
        Ok(Self { layout: layout.clone(), amps })
    }

    /// |q₁ q₂⟩ ⊗ |n_cm⟩ ⊗ |n_br⟩ … with motional Fock numbers for every mode in `layout`.
    pub fn qubits_with_fock(
        layout: &HilbertLayout,
        q1: QubitState,
        q2: QubitState,
        fock: &[usize],
    ) -> Result<Self> {
        let mut digits = vec![q1.index(), q2.index()];
        digits.extend_from_slice(fock);
        Self::basis(layout, &digits)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps /= C64::new(n, 0.0);
        }
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&self, op: &Operator) -> Result<StateVector> {
        if op.dim() != self.amps.len() {
            return Err(Error::DimensionMismatch { expected: self.amps.len(), found: op.dim() });
        }
        Ok(Self { layout: self.layout.clone(), amps: op.matrix() * &self.amps })
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { layout: self.layout.clone(), matrix: &self.amps * self.amps.adjoint() }
    }

    /// Reduced density matrix of the kept subsystems, without forming |ψ⟩⟨ψ|.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let kept = self.layout.select(keep)?;
        let traced: Vec<usize> = (0..self.layout.subsystems()).filter(|k| !keep.contains(k)).collect();
        let traced_dim: usize = traced.iter().map(|&k| self.layout.dim(k)).product();
        let kd = kept.total();
        // amplitude table psi[k_index][t_index]
        let mut table = DMatrix::<C64>::zeros(kd, traced_dim);
        let traced_layout_dims: Vec<usize> = traced.iter().map(|&k| self.layout.dim(k)).collect();
        for (idx, &amp) in self.amps.iter().enumerate() {
            let digits = self.layout.digits(idx);
            let ki = keep.iter().fold(0, |acc, &k| acc * self.layout.dim(k) + digits[k]);
            let ti = traced
                .iter()
                .zip(&traced_layout_dims)
                .fold(0, |acc, (&k, &d)| acc * d + digits[k]);
            table[(ki, ti)] = amp;
        }
        let matrix = &table * table.adjoint();
        Ok(DensityMatrix { layout: kept, matrix })
    }
}

/// Mixed state on a composite Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(layout: HilbertLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let n = layout.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        Ok(Self { layout, matrix })
    }

    /// Builds a density matrix and checks hermiticity, trace and positivity.
    pub fn validated(layout: HilbertLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::new(layout, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    pub fn validate(&self) -> Result<()> {
        let op = self.as_operator();
        let herm = op.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::InvalidArgument(format!("density matrix not Hermitian ({herm:.2e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < POSITIVITY_FLOOR {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn as_operator(&self) -> Operator {
        Operator::new(self.layout.clone(), self.matrix.clone()).expect("layout matches")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn expectation_state(&self, psi: &StateVector) -> Result<f64> {
        if psi.amplitudes().len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.amplitudes().len() });
        }
        let v = psi.amplitudes();
        Ok((v.adjoint() * &self.matrix * v)[(0, 0)].re)
    }

    /// Tr(ρ A)
    pub fn expectation(&self, op: &Operator) -> C64 {
        (&self.matrix * op.matrix()).trace()
    }

    /// Convex combination Σ wᵢ ρᵢ.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let mut m = DMatrix::<C64>::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            m += &rho.matrix * C64::new(*w, 0.0);
        }
        DensityMatrix::new(first.layout.clone(), m)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            layout: self.layout.concat(&other.layout),
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

/// Reduced density matrix on the kept subsystems (in the order listed).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let layout = rho.layout();
    let kept = layout.select(keep)?;
    let traced: Vec<usize> = (0..layout.subsystems()).filter(|k| !keep.contains(k)).collect();
    let kd = kept.total();
    let n = layout.total();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| layout.digits(i)).collect();
    let kept_index: Vec<usize> = digits
        .iter()
        .map(|d| keep.iter().fold(0, |acc, &k| acc * layout.dim(k) + d[k]))
        .collect();
    let mut out = DMatrix::<C64>::zeros(kd, kd);
    for i in 0..n {
        for j in 0..n {
            if traced.iter().all(|&k| digits[i][k] == digits[j][k]) {
                out[(kept_index[i], kept_index[j])] += rho.matrix()[(i, j)];
            }
        }
    }
    DensityMatrix::new(kept, out)
}

/// Thermal occupation probabilities p_n ∝ (n̄/(n̄+1))ⁿ, renormalized on `dim` levels.
pub fn thermal_populations(dim: usize, nbar: f64) -> Result<Vec<f64>> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidArgument(format!("thermal occupation must be >= 0, got {nbar}")));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("thermal state needs dim >= 1".into()));
    }
    let r = nbar / (nbar + 1.0);
    let mut p: Vec<f64> = (0..dim).map(|n| r.powi(n as i32)).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    Ok(p)
}

pub fn thermal_state(dim: usize, nbar: f64) -> Result<DensityMatrix> {
    let p = thermal_populations(dim, nbar)?;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for (n, &pn) in p.iter().enumerate() {
        m[(n, n)] = C64::new(pn, 0.0);
    }
    DensityMatrix::new(HilbertLayout::single(dim)?, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> StateVector {
        let s = 0.5f64.sqrt();
        let amps = DVector::from_vec(vec![
            C64::new(0.0, s),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(s, 0.0),
        ]);
        StateVector::new(HilbertLayout::qubits(), amps).unwrap()
    }

    #[test]
    fn product_state_partial_trace() {
        let gg = StateVector::basis(&HilbertLayout::qubits(), &[1, 1]).unwrap().to_density();
        let th = thermal_state(6, 0.7).unwrap();
        let joint = gg.tensor(&th);
        let red = partial_trace(&joint, &[0, 1]).unwrap();
        assert!((red.matrix() - gg.matrix()).iter().all(|z| z.norm() < 1e-15));
        let red_mode = partial_trace(&joint, &[2]).unwrap();
        assert!((red_mode.matrix() - th.matrix()).iter().all(|z| z.norm() < 1e-15));
        assert!((red.trace() - joint.trace()).abs() < 1e-12);
        assert!(partial_trace(&joint, &[4]).is_err());
    }

    #[test]
    fn entangled_pair_reduces_to_maximally_mixed() {
        let rho = bell().to_density();
        let r1 = partial_trace(&rho, &[0]).unwrap();
        assert!((r1.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((r1.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(r1.matrix()[(0, 1)].norm() < 1e-15);
        let r1b = bell().reduced(&[0]).unwrap();
        assert!((r1b.matrix() - r1.matrix()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn reduced_matches_partial_trace_on_random_state() {
        let l = HilbertLayout::qubits_cm_br(3, 2).unwrap();
        let amps: Vec<C64> = (0..l.total())
            .map(|k| C64::new((k as f64 * 0.37).sin(), (k as f64 * 1.1).cos()))
            .collect();
        let mut psi = StateVector::new(l, DVector::from_vec(amps)).unwrap();
        psi.normalize();
        let a = psi.reduced(&[0, 1]).unwrap();
        let b = partial_trace(&psi.to_density(), &[0, 1]).unwrap();
        assert!((a.matrix() - b.matrix()).iter().all(|z| z.norm() < 1e-14));
        let a = psi.reduced(&[3, 1]).unwrap();
        let b = partial_trace(&psi.to_density(), &[3, 1]).unwrap();
        assert!((a.matrix() - b.matrix()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn thermal_states() {
        let vac = thermal_state(5, 0.0).unwrap();
        assert_eq!(vac.matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(vac.trace(), 1.0);

        let p = thermal_populations(15, 1.0).unwrap();
        let total: f64 = p.iter().sum();
        let mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let eps = 1.0 - mean;
        assert!(eps > 0.0 && eps < 5e-4, "truncation deficit {eps}");

        let two = thermal_populations(2, 1.0).unwrap();
        assert!((two[0] - 2.0 / 3.0).abs() < 1e-15 && (two[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(thermal_state(3, -0.1).is_err());
    }

    #[test]
    fn validation_flags_bad_states() {
        let l = HilbertLayout::single(2).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[
            C64::new(1.2, 0.0), C64::new(0.0, 0.0),
            C64::new(0.0, 0.0), C64::new(-0.2, 0.0),
        ]);
        assert!(DensityMatrix::validated(l.clone(), bad).is_err());
        let ok = thermal_state(2, 1.0).unwrap();
        assert!(ok.validate().is_ok());
    }
}
