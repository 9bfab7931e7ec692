//! Lab-driven models in the interaction picture of the free qubit and motional
//! energies: the full two-mode model and its single-mode reduction.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{phasor, ErrorSample, ErrorSource, Generator};
use crate::controls::{ControlSchedule, PhysicalParams};
use crate::qops::{
    collective_spin, mode_op, qubit_op, HilbertLayout, Operator, Pauli, SparseOperator, SpinAxis,
    BREATHING_MODE, CM_MODE, QUBIT_1, QUBIT_2,
};
use crate::{Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveOptions {
    /// Off-resonant driving of each qubit by the other qubit's tones.
    pub crosstalk: bool,
    /// Coupling to the stretch (breathing) mode.
    pub breathing_mode: bool,
    /// Phase modulation e^{ifφ(t)} on the drive.
    pub phase_modulation: bool,
}

impl Default for DriveOptions {
    fn default() -> Self {
        DriveOptions { crosstalk: true, breathing_mode: true, phase_modulation: true }
    }
}

impl DriveOptions {
    pub fn simplified() -> Self {
        DriveOptions { crosstalk: false, breathing_mode: false, phase_modulation: true }
    }
}

#[derive(Clone, Copy, Debug)]
enum Term {
    CmDown,
    CmUp,
    BrDown,
    BrUp,
    /// σ⁺ on one qubit; `crosstalk` is the sign of the Δω phase.
    Raise { crosstalk: Option<f64> },
    Lower { crosstalk: Option<f64> },
    Z1,
    Z2,
}

/// H(t) = ην(a e^{−iνt} + h.c.)S_z [+ 3^{−1/4}ην(b e^{−i√3νt} + h.c.)(σ₂ᶻ − σ₁ᶻ)]
///      + {D(t)[σ₁⁺(1 + e^{−iΔωt}) + σ₂⁺(1 + e^{iΔωt})] + h.c.} + ε₁σ₁ᶻ/2 + ε₂σ₂ᶻ/2,
/// D(t) = [Ω cos δt − i f Ω_DD/2] e^{ifφ(t)}.
///
/// The crosstalk factors are dropped when disabled and the breathing terms are
/// absent on a three-subsystem layout.
#[derive(Clone, Debug)]
pub struct DrivenIonModel {
    layout: HilbertLayout,
    terms: Arc<[SparseOperator]>,
    kinds: Arc<[Term]>,
    term_norms: Arc<[f64]>,
    schedule: ControlSchedule,
    options: DriveOptions,
    coupling: f64,
    breathing: f64,
    trap: f64,
    splitting: f64,
    errors: ErrorSample,
    noise: Option<Arc<dyn ErrorSource>>,
}

impl DrivenIonModel {
    /// Two qubits, c.m. and breathing modes.
    pub fn full(p: &PhysicalParams, s: &ControlSchedule, options: DriveOptions) -> Result<Self> {
        let layout = HilbertLayout::qubits_cm_br(p.n_cm, p.n_br)?;
        Self::build(layout, p, s, options)
    }

    /// Two qubits and the c.m. mode; crosstalk and breathing forced off.
    pub fn simplified(p: &PhysicalParams, s: &ControlSchedule, phase_modulation: bool) -> Result<Self> {
        let layout = HilbertLayout::qubits_cm(p.n_cm)?;
        let options = DriveOptions { crosstalk: false, breathing_mode: false, phase_modulation };
        Self::build(layout, p, s, options)
    }

    fn build(
        layout: HilbertLayout,
        p: &PhysicalParams,
        s: &ControlSchedule,
        options: DriveOptions,
    ) -> Result<Self> {
        p.validate()?;
        s.validate()?;
        let has_br = layout.subsystems() > BREATHING_MODE;
        let options = DriveOptions { breathing_mode: options.breathing_mode && has_br, ..options };

        let sz = collective_spin(SpinAxis::Z, &layout)?;
        let a = mode_op(CM_MODE, &layout)?;
        let mut ops: Vec<Operator> = Vec::new();
        let mut kinds = Vec::new();
        ops.push(&a * &sz);
        kinds.push(Term::CmDown);
        ops.push(&a.adjoint() * &sz);
        kinds.push(Term::CmUp);
        if options.breathing_mode {
            let b = mode_op(BREATHING_MODE, &layout)?;
            let stretch = &qubit_op(Pauli::Z, QUBIT_2, &layout)? - &qubit_op(Pauli::Z, QUBIT_1, &layout)?;
            ops.push(&b * &stretch);
            kinds.push(Term::BrDown);
            ops.push(&b.adjoint() * &stretch);
            kinds.push(Term::BrUp);
        }
        for (q, sign) in [(QUBIT_1, -1.0), (QUBIT_2, 1.0)] {
            let crosstalk = options.crosstalk.then_some(sign);
            ops.push(qubit_op(Pauli::Plus, q, &layout)?);
            kinds.push(Term::Raise { crosstalk });
            ops.push(qubit_op(Pauli::Minus, q, &layout)?);
            kinds.push(Term::Lower { crosstalk });
        }
        ops.push(qubit_op(Pauli::Z, QUBIT_1, &layout)?);
        kinds.push(Term::Z1);
        ops.push(qubit_op(Pauli::Z, QUBIT_2, &layout)?);
        kinds.push(Term::Z2);

        let terms: Vec<SparseOperator> = ops.iter().map(SparseOperator::from_operator).collect();
        let term_norms: Vec<f64> = terms.iter().map(SparseOperator::norm_bound).collect();
        let eta = s.lamb_dicke;
        Ok(DrivenIonModel {
            layout,
            terms: terms.into(),
            kinds: kinds.into(),
            term_norms: term_norms.into(),
            schedule: s.clone(),
            options,
            coupling: eta * s.trap_frequency,
            breathing: 3f64.powf(-0.25) * eta * s.trap_frequency,
            trap: s.trap_frequency,
            splitting: p.qubit_splitting(),
            errors: ErrorSample::default(),
            noise: None,
        })
    }

    pub fn options(&self) -> DriveOptions {
        self.options
    }

    pub fn schedule(&self) -> &ControlSchedule {
        &self.schedule
    }

    /// Copy with static errors added to every time sample.
    pub fn with_errors(&self, errors: ErrorSample) -> Self {
        DrivenIonModel { errors, ..self.clone() }
    }

    /// Copy driven by a sampled noise path on top of the static errors.
    pub fn with_noise(&self, noise: Arc<dyn ErrorSource>) -> Self {
        DrivenIonModel { noise: Some(noise), ..self.clone() }
    }

    pub fn errors_at(&self, t: f64) -> ErrorSample {
        match &self.noise {
            Some(n) => self.errors.add(n.sample(t)),
            None => self.errors,
        }
    }

    /// Drive envelope D(t) on flip segment `piece`.
    fn drive(&self, t: f64, piece: usize, e: &ErrorSample) -> C64 {
        let s = &self.schedule;
        let f = s.flip_sign(piece);
        let rabi = s.rabi * (1.0 + e.rabi_rel) * (s.detuning * t).cos();
        let carrier = -0.5 * f * s.carrier * (1.0 + e.carrier_rel);
        let d = C64::new(rabi, carrier);
        if self.options.phase_modulation && s.phase_amplitude != 0.0 {
            d * phasor(f * s.phase_envelope(t))
        } else {
            d
        }
    }
}

impl Generator for DrivenIonModel {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    fn terms(&self) -> &[SparseOperator] {
        &self.terms
    }

    fn coefficients(&self, t: f64, piece: usize, out: &mut [C64]) {
        let e = self.errors_at(t);
        let cm = self.coupling * phasor(-self.trap * t);
        let br = self.breathing * phasor(-(3f64.sqrt()) * self.trap * t);
        let d = self.drive(t, piece, &e);
        let xt = if self.options.crosstalk { phasor(-self.splitting * t) } else { C64::new(0.0, 0.0) };
        for (c, kind) in out.iter_mut().zip(self.kinds.iter()) {
            *c = match *kind {
                Term::CmDown => cm,
                Term::CmUp => cm.conj(),
                Term::BrDown => br,
                Term::BrUp => br.conj(),
                Term::Raise { crosstalk } => d * crosstalk_factor(crosstalk, xt),
                Term::Lower { crosstalk } => (d * crosstalk_factor(crosstalk, xt)).conj(),
                Term::Z1 => C64::new(0.5 * e.eps1, 0.0),
                Term::Z2 => C64::new(0.5 * e.eps2, 0.0),
            };
        }
    }

    fn breakpoints(&self) -> &[f64] {
        &self.schedule.flip_times
    }

    fn fastest_frequency(&self) -> f64 {
        let s = &self.schedule;
        let mut w = s.detuning.max(self.trap);
        if self.options.breathing_mode {
            w = w.max(3f64.sqrt() * self.trap);
        }
        if self.options.crosstalk {
            w = w.max(self.splitting + s.detuning);
        }
        w
    }

    fn norm_bound(&self) -> f64 {
        let s = &self.schedule;
        let mut e = self.errors;
        if let Some(n) = &self.noise {
            let b = n.bound();
            e = ErrorSample {
                eps1: e.eps1.abs() + b.eps1,
                eps2: e.eps2.abs() + b.eps2,
                rabi_rel: e.rabi_rel.abs() + b.rabi_rel,
                carrier_rel: e.carrier_rel.abs() + b.carrier_rel,
            };
        }
        let drive = s.rabi * (1.0 + e.rabi_rel.abs()) + 0.5 * s.carrier * (1.0 + e.carrier_rel.abs());
        let xt = if self.options.crosstalk { 2.0 } else { 1.0 };
        self.kinds
            .iter()
            .zip(self.term_norms.iter())
            .map(|(k, n)| {
                let c = match k {
                    Term::CmDown | Term::CmUp => self.coupling,
                    Term::BrDown | Term::BrUp => self.breathing,
                    Term::Raise { .. } | Term::Lower { .. } => drive * xt,
                    Term::Z1 => 0.5 * e.eps1.abs(),
                    Term::Z2 => 0.5 * e.eps2.abs(),
                };
                c * n
            })
            .sum()
    }
}

#[inline]
fn crosstalk_factor(sign: Option<f64>, xt: C64) -> C64 {
    match sign {
        None => C64::new(1.0, 0.0),
        Some(s) if s < 0.0 => C64::new(1.0, 0.0) + xt,
        Some(_) => C64::new(1.0, 0.0) + xt.conj(),
    }
}
