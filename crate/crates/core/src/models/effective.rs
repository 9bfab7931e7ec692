//! Reduced and effective Hamiltonians used as oracles for the driven models.

use std::sync::Arc;

use super::bessel::{j0, j1};
use super::{phasor, Generator};
use crate::controls::ControlSchedule;
use crate::qops::{
    collective_spin, matrix_exponential, mode_op, number, tensor, HilbertLayout, Operator,
    SparseOperator, SpinAxis, CM_MODE,
};
use crate::{Error, Result, C64};

/// Relative distance from the Ω̃ = ν resonance below which the second-order
/// couplings are refused.
pub const RESONANCE_GUARD: f64 = 1e-3;

fn sparse_terms(ops: &[Operator]) -> (Arc<[SparseOperator]>, Vec<f64>) {
    let terms: Vec<SparseOperator> = ops.iter().map(SparseOperator::from_operator).collect();
    let norms = terms.iter().map(SparseOperator::norm_bound).collect();
    (terms.into(), norms)
}

/// H_G = i g (a† e^{−iξt} − a e^{iξt}) S_y with g = ην J₁(2Ω/δ).
#[derive(Clone, Debug)]
pub struct GateModel {
    layout: HilbertLayout,
    terms: Arc<[SparseOperator]>,
    norms: Vec<f64>,
    coupling: f64,
    gate_detuning: f64,
}

impl GateModel {
    pub fn new(s: &ControlSchedule, n_cm: usize) -> Result<Self> {
        let layout = HilbertLayout::qubits_cm(n_cm)?;
        let a = mode_op(CM_MODE, &layout)?;
        let sy = collective_spin(SpinAxis::Y, &layout)?;
        let (terms, norms) = sparse_terms(&[&a.adjoint() * &sy, &a * &sy]);
        let coupling = s.lamb_dicke * s.trap_frequency * j1(2.0 * s.rabi / s.detuning);
        Ok(GateModel { layout, terms, norms, coupling, gate_detuning: s.gate_detuning })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }
}

impl Generator for GateModel {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }
    fn terms(&self) -> &[SparseOperator] {
        &self.terms
    }
    fn coefficients(&self, t: f64, _piece: usize, out: &mut [C64]) {
        let c = C64::new(0.0, self.coupling) * phasor(-self.gate_detuning * t);
        out[0] = c;
        out[1] = c.conj();
    }
    fn fastest_frequency(&self) -> f64 {
        self.gate_detuning
    }
    fn norm_bound(&self) -> f64 {
        self.coupling * (self.norms[0] + self.norms[1])
    }
}

/// First-order bichromatic-frame Hamiltonian
/// ην(a e^{−iνt} + h.c.)(J₀S_z + 2J₁ sin δt S_y) + f[Ω̃/2 − Ω_DD (J₁²/J₀) cos 2δt] S_y.
#[derive(Clone, Debug)]
pub struct BichromaticFrameModel {
    layout: HilbertLayout,
    terms: Arc<[SparseOperator]>,
    norms: Vec<f64>,
    schedule: ControlSchedule,
    b0: f64,
    b1: f64,
}

impl BichromaticFrameModel {
    pub fn new(s: &ControlSchedule, n_cm: usize) -> Result<Self> {
        let layout = HilbertLayout::qubits_cm(n_cm)?;
        let a = mode_op(CM_MODE, &layout)?;
        let sy = collective_spin(SpinAxis::Y, &layout)?;
        let sz = collective_spin(SpinAxis::Z, &layout)?;
        let ad = a.adjoint();
        let (terms, norms) = sparse_terms(&[&a * &sz, &ad * &sz, &a * &sy, &ad * &sy, sy]);
        let x = 2.0 * s.rabi / s.detuning;
        Ok(BichromaticFrameModel { layout, terms, norms, schedule: s.clone(), b0: j0(x), b1: j1(x) })
    }
}

impl Generator for BichromaticFrameModel {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }
    fn terms(&self) -> &[SparseOperator] {
        &self.terms
    }
    fn coefficients(&self, t: f64, piece: usize, out: &mut [C64]) {
        let s = &self.schedule;
        let g = s.lamb_dicke * s.trap_frequency * phasor(-s.trap_frequency * t);
        let f = s.flip_sign(piece);
        out[0] = g * self.b0;
        out[1] = out[0].conj();
        out[2] = g * (2.0 * self.b1 * (s.detuning * t).sin());
        out[3] = out[2].conj();
        let carrier = 0.5 * s.effective_carrier
            - s.carrier * self.b1 * self.b1 / self.b0 * (2.0 * s.detuning * t).cos();
        out[4] = C64::new(f * carrier, 0.0);
    }
    fn breakpoints(&self) -> &[f64] {
        &self.schedule.flip_times
    }
    fn fastest_frequency(&self) -> f64 {
        let s = &self.schedule;
        (s.trap_frequency + s.detuning).max(2.0 * s.detuning)
    }
    fn norm_bound(&self) -> f64 {
        let s = &self.schedule;
        let g = s.lamb_dicke * s.trap_frequency;
        let carrier = 0.5 * s.effective_carrier.abs() + s.carrier.abs() * self.b1 * self.b1 / self.b0;
        g * self.b0 * (self.norms[0] + self.norms[1])
            + 2.0 * g * self.b1 * (self.norms[2] + self.norms[3])
            + carrier * self.norms[4]
    }
}

/// Motional coupling seen from the frame dressed by the carrier:
/// g(S̃⁺a e^{−i(ν−Ω̃)t} + S̃⁻a e^{−i(ν+Ω̃)t} + h.c.).
#[derive(Clone, Debug)]
pub struct DressedSidebandModel {
    layout: HilbertLayout,
    terms: Arc<[SparseOperator]>,
    norms: Vec<f64>,
    coupling: f64,
    trap: f64,
    carrier: f64,
}

impl DressedSidebandModel {
    pub fn new(layout: HilbertLayout, coupling: f64, trap: f64, carrier: f64) -> Result<Self> {
        let a = mode_op(CM_MODE, &layout)?;
        let sp = collective_spin(SpinAxis::DressedPlus, &layout)?;
        let sm = collective_spin(SpinAxis::DressedMinus, &layout)?;
        let up = &sp * &a;
        let down = &sm * &a;
        let (terms, norms) = sparse_terms(&[up.adjoint(), down.adjoint(), up, down]);
        Ok(DressedSidebandModel { layout, terms, norms, coupling, trap, carrier })
    }
}

impl Generator for DressedSidebandModel {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }
    fn terms(&self) -> &[SparseOperator] {
        &self.terms
    }
    fn coefficients(&self, t: f64, _piece: usize, out: &mut [C64]) {
        let c1 = self.coupling * phasor(-(self.trap - self.carrier) * t);
        let c2 = self.coupling * phasor(-(self.trap + self.carrier) * t);
        out[0] = c1.conj();
        out[1] = c2.conj();
        out[2] = c1;
        out[3] = c2;
    }
    fn fastest_frequency(&self) -> f64 {
        self.trap + self.carrier.abs()
    }
    fn norm_bound(&self) -> f64 {
        self.coupling * self.norms.iter().sum::<f64>()
    }
}

/// Time-independent generator wrapping a single Hermitian operator.
#[derive(Clone, Debug)]
pub struct StaticGenerator {
    layout: HilbertLayout,
    terms: Arc<[SparseOperator]>,
    norm: f64,
}

impl StaticGenerator {
    pub fn new(h: &Operator) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::InvalidArgument(format!(
                "static Hamiltonian not Hermitian (error {:.2e})",
                h.hermiticity_error()
            )));
        }
        let (terms, norms) = sparse_terms(std::slice::from_ref(h));
        Ok(StaticGenerator { layout: h.layout().clone(), terms, norm: norms[0] })
    }
}

impl Generator for StaticGenerator {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }
    fn terms(&self) -> &[SparseOperator] {
        &self.terms
    }
    fn coefficients(&self, _t: f64, _piece: usize, out: &mut [C64]) {
        out[0] = C64::new(1.0, 0.0);
    }
    fn fastest_frequency(&self) -> f64 {
        0.0
    }
    fn norm_bound(&self) -> f64 {
        self.norm
    }
}

/// Sum of generators on one layout; each part keeps its own breakpoints.
pub struct GeneratorSum {
    parts: Vec<Arc<dyn Generator>>,
    terms: Vec<SparseOperator>,
    offsets: Vec<usize>,
    breakpoints: Vec<f64>,
}

impl GeneratorSum {
    pub fn new(parts: Vec<Arc<dyn Generator>>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("empty generator sum".into()))?;
        let layout = first.layout().clone();
        let mut terms = Vec::new();
        let mut offsets = vec![0];
        let mut breakpoints = Vec::new();
        for p in &parts {
            if p.layout() != &layout {
                return Err(Error::Layout("generator sum needs a common layout".into()));
            }
            terms.extend(p.terms().iter().cloned());
            offsets.push(terms.len());
            breakpoints.extend_from_slice(p.breakpoints());
        }
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(GeneratorSum { parts, terms, offsets, breakpoints })
    }
}

impl Generator for GeneratorSum {
    fn layout(&self) -> &HilbertLayout {
        self.parts[0].layout()
    }
    fn terms(&self) -> &[SparseOperator] {
        &self.terms
    }
    fn coefficients(&self, t: f64, piece: usize, out: &mut [C64]) {
        let start = if piece == 0 { f64::NEG_INFINITY } else { self.breakpoints[piece - 1] };
        for (k, p) in self.parts.iter().enumerate() {
            let own = p.breakpoints().partition_point(|&b| b <= start);
            p.coefficients(t, own, &mut out[self.offsets[k]..self.offsets[k + 1]]);
        }
    }
    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    fn fastest_frequency(&self) -> f64 {
        self.parts.iter().map(|p| p.fastest_frequency()).fold(0.0, f64::max)
    }
    fn norm_bound(&self) -> f64 {
        self.parts.iter().map(|p| p.norm_bound()).sum()
    }
}

/// (g_ν, g_Ω̃) = (ν, Ω̃)·η²J₀² / (1 − Ω̃²/ν²).
pub fn second_order_couplings(eta: f64, trap: f64, carrier: f64, bessel0: f64) -> Result<(f64, f64)> {
    let denom = 1.0 - (carrier / trap).powi(2);
    if !(denom.abs() >= RESONANCE_GUARD) {
        return Err(Error::InvalidArgument(format!(
            "carrier Ω̃/ν = {:.6} too close to the motional resonance",
            carrier / trap
        )));
    }
    let k = eta * eta * bessel0 * bessel0 / denom;
    Ok((trap * k, carrier * k))
}

/// −(g_ν/2)(S_x² + S_z²) − g_Ω̃(2a†a + 1)S_y on a qubits ⊗ c.m. layout.
pub fn second_order_effective(g_nu: f64, g_carrier: f64, layout: &HilbertLayout) -> Result<Operator> {
    let sx = collective_spin(SpinAxis::X, layout)?;
    let sy = collective_spin(SpinAxis::Y, layout)?;
    let sz = collective_spin(SpinAxis::Z, layout)?;
    let n = crate::qops::embed(&number(layout.dim(CM_MODE))?, CM_MODE, layout)?;
    let mode = &n.scale_real(2.0) + &Operator::identity(layout);
    let spin = &(&sx * &sx) + &(&sz * &sz);
    Ok(&spin.scale_real(-0.5 * g_nu) - &(&mode * &sy).scale_real(g_carrier))
}

/// exp(−iθS_y²) on the qubits, identity on every other subsystem.
///
/// With θ = π/8 this maps |gg⟩ to (|gg⟩ + i|ee⟩)/√2 up to a global phase, the
/// state reached by the gate Hamiltonian.
pub fn gate_unitary(theta: f64, layout: &HilbertLayout) -> Result<Operator> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("gate angle"));
    }
    if !layout.has_qubit_pair() {
        return Err(Error::Layout(format!("layout {:?} has no qubit pair", layout.dims())));
    }
    let q = HilbertLayout::qubits();
    let sy = collective_spin(SpinAxis::Y, &q)?;
    let u = matrix_exponential(&(&sy * &sy), C64::new(0.0, -theta))?;
    if layout.subsystems() == 2 {
        return Ok(u);
    }
    let rest: Vec<usize> = (2..layout.subsystems()).collect();
    let id = Operator::identity(&layout.select(&rest)?);
    tensor(&[&u, &id])
}
