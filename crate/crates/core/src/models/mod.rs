//! Time-dependent Hamiltonians of the two-ion gate.
//!
//! Every model is a [`Generator`]: a fixed list of sparse operators `A_k`
//! together with scalar coefficients `c_k(t)`, so that `H(t) = Σ c_k(t) A_k`.
//! Integrators only ever touch the coefficients and the sparse terms.

pub mod bessel;
mod driven;
mod effective;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use driven::{DriveOptions, DrivenIonModel};
pub use effective::{
    gate_unitary, second_order_couplings, second_order_effective, BichromaticFrameModel, GeneratorSum,
    DressedSidebandModel, GateModel, StaticGenerator,
};

use crate::qops::{HilbertLayout, Operator, SparseOperator};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Both modes, crosstalk, phase modulation and flips in the free-energy frame.
    Full,
    /// Qubits and c.m. mode without crosstalk.
    Simplified,
    /// First-order Jacobi-Anger form in the bichromatic frame.
    BichromaticFrame,
    /// Resonant gate Hamiltonian only.
    Gate,
    /// Static second-order effective Hamiltonian.
    SecondOrder,
}

/// Instantaneous control errors entering the driven models.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    /// Qubit-1 frequency offset ε₁ (rad/s).
    pub eps1: f64,
    /// Qubit-2 frequency offset ε₂ (rad/s).
    pub eps2: f64,
    /// Relative error of the bichromatic amplitude Ω.
    pub rabi_rel: f64,
    /// Relative error of the carrier amplitude Ω_DD.
    pub carrier_rel: f64,
}

impl ErrorSample {
    pub fn add(self, o: ErrorSample) -> ErrorSample {
        ErrorSample {
            eps1: self.eps1 + o.eps1,
            eps2: self.eps2 + o.eps2,
            rabi_rel: self.rabi_rel + o.rabi_rel,
            carrier_rel: self.carrier_rel + o.carrier_rel,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == ErrorSample::default()
    }
}

/// Source of time-dependent control errors (a sampled noise path).
pub trait ErrorSource: Send + Sync + std::fmt::Debug {
    fn sample(&self, t: f64) -> ErrorSample;
    /// Bound on |ε₁|, |ε₂|, |rabi_rel|, |carrier_rel| over the gate.
    fn bound(&self) -> ErrorSample;
}

/// `H(t) = Σ_k c_k(t) A_k`; piecewise-smooth between [`Generator::breakpoints`].
pub trait Generator: Send + Sync {
    fn layout(&self) -> &HilbertLayout;

    fn terms(&self) -> &[SparseOperator];

    /// Writes `c_k(t)` for `t` inside smooth piece `piece` (0 before the first
    /// breakpoint).
    fn coefficients(&self, t: f64, piece: usize, out: &mut [C64]);

    /// Times where coefficients jump.
    fn breakpoints(&self) -> &[f64] {
        &[]
    }

    /// Fastest angular frequency in the coefficients, used for step selection.
    fn fastest_frequency(&self) -> f64;

    /// Upper bound on ‖H(t)‖ over the gate.
    fn norm_bound(&self) -> f64;

    /// Dense `H(t)`; a time exactly on a breakpoint belongs to the later piece.
    fn matrix(&self, t: f64) -> Operator {
        let piece = self.breakpoints().partition_point(|&b| b <= t);
        let mut c = vec![C64::new(0.0, 0.0); self.terms().len()];
        self.coefficients(t, piece, &mut c);
        let n = self.layout().total();
        let mut m = nalgebra::DMatrix::<C64>::zeros(n, n);
        for (ck, a) in c.iter().zip(self.terms()) {
            if *ck != C64::new(0.0, 0.0) {
                m += a.to_dense() * *ck;
            }
        }
        Operator::new(self.layout().clone(), m).expect("terms match layout")
    }
}

impl<G: Generator + ?Sized> Generator for Arc<G> {
    fn layout(&self) -> &HilbertLayout {
        (**self).layout()
    }
    fn terms(&self) -> &[SparseOperator] {
        (**self).terms()
    }
    fn coefficients(&self, t: f64, piece: usize, out: &mut [C64]) {
        (**self).coefficients(t, piece, out)
    }
    fn breakpoints(&self) -> &[f64] {
        (**self).breakpoints()
    }
    fn fastest_frequency(&self) -> f64 {
        (**self).fastest_frequency()
    }
    fn norm_bound(&self) -> f64 {
        (**self).norm_bound()
    }
}

impl<G: Generator + ?Sized> Generator for Box<G> {
    fn layout(&self) -> &HilbertLayout {
        (**self).layout()
    }
    fn terms(&self) -> &[SparseOperator] {
        (**self).terms()
    }
    fn coefficients(&self, t: f64, piece: usize, out: &mut [C64]) {
        (**self).coefficients(t, piece, out)
    }
    fn breakpoints(&self) -> &[f64] {
        (**self).breakpoints()
    }
    fn fastest_frequency(&self) -> f64 {
        (**self).fastest_frequency()
    }
    fn norm_bound(&self) -> f64 {
        (**self).norm_bound()
    }
}

#[inline]
pub(crate) fn phasor(phase: f64) -> C64 {
    let (s, c) = phase.sin_cos();
    C64::new(c, s)
}

/// Mean of `e^{i x sin θ}` over one period by the trapezoid rule, which is
/// spectrally accurate for periodic integrands.
pub fn jacobi_anger_average(x: f64, points: usize) -> C64 {
    let sum: C64 = (0..points)
        .map(|k| phasor(x * (2.0 * PI * k as f64 / points as f64).sin()))
        .sum();
    sum / points as f64
}
