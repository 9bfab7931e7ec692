//! Time evolution under the time-dependent models: pure states, density
//! matrices, quantum-jump trajectories and seeded ensembles.

mod stepper;
mod system;
mod trajectory;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use trajectory::{
    run_ensemble, run_trajectory, trajectory_seed, Dissipation, EnsembleResult, InitialMotion,
    SimModel, TrajectoryResult, TrajectorySpec,
};

use crate::models::Generator;
use crate::noise::LindbladChannel;
use crate::qops::{qubit_op, DensityMatrix, Operator, Pauli, SparseOperator, StateVector};
use crate::{Error, Result, C64};
use stepper::{DormandPrince, Rk4};
use system::{Lindblad, OdeSystem, Schrodinger};

/// Largest accepted |‖ψ‖ − 1| (or trace drift) before renormalization.
pub const NORM_DRIFT_TOL: f64 = 1e-7;

/// Eigenvalue floor for the positivity check after master-equation runs.
pub const LINDBLAD_POSITIVITY_FLOOR: f64 = -1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    RkAdaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step (s); derived from the model when absent.
    pub dt: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// Step as a fraction of the fastest period in the model.
    pub max_step_fraction_of_fastest_period: f64,
    /// Upper bound on dt·‖H‖ for the fixed-step method.
    pub max_phase_per_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4Fixed,
            dt: None,
            rtol: 1e-9,
            atol: 1e-11,
            max_step_fraction_of_fastest_period: 1.0 / 50.0,
            max_phase_per_step: 0.02,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.max_step_fraction_of_fastest_period > 0.0
            && self.max_step_fraction_of_fastest_period <= 1.0
            && self.max_phase_per_step > 0.0
            && self.dt.is_none_or(|dt| dt > 0.0 && dt.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid integrator settings {self:?}")))
        }
    }

    /// Largest step allowed for `g`: the period rule, the explicit `dt`
    /// and the dt·‖H‖ bound, whichever is smallest.
    pub fn step_limit(&self, g: &dyn Generator) -> f64 {
        let w = g.fastest_frequency();
        let mut h = if w > 0.0 {
            2.0 * PI / w * self.max_step_fraction_of_fastest_period
        } else {
            f64::INFINITY
        };
        if let Some(dt) = self.dt {
            h = h.min(dt);
        }
        let norm = g.norm_bound();
        if norm > 0.0 {
            h = h.min(self.max_phase_per_step / norm);
        }
        h
    }
}

/// Instantaneous rotation exp(i(angle/2)σ^axis) on one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub time: f64,
    pub qubit: usize,
    pub axis: PulseAxis,
    pub angle: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseAxis {
    X,
    Y,
    Z,
}

impl PulseAxis {
    fn pauli(self) -> Pauli {
        match self {
            PulseAxis::X => Pauli::X,
            PulseAxis::Y => Pauli::Y,
            PulseAxis::Z => Pauli::Z,
        }
    }
}

impl Pulse {
    /// π about y on qubit 1 at each of `times`.
    pub fn refocusing(times: &[f64]) -> Vec<Pulse> {
        times.iter().map(|&time| Pulse { time, qubit: 0, axis: PulseAxis::Y, angle: PI }).collect()
    }

    pub fn unitary(&self, layout: &crate::qops::HilbertLayout) -> Result<Operator> {
        let s = qubit_op(self.axis.pauli(), self.qubit, layout)?;
        let (sn, cs) = (0.5 * self.angle).sin_cos();
        Ok(&Operator::identity(layout).scale_real(cs) + &s.scale(C64::new(0.0, sn)))
    }
}

/// state ← exp(i(angle/2)σ^axis_qubit)·state
pub fn apply_instantaneous_pulse(state: &mut StateVector, pulse: &Pulse) -> Result<()> {
    let u = SparseOperator::from_operator(&pulse.unitary(state.layout())?);
    let out = u.apply(state.amplitudes());
    *state.amplitudes_mut() = out;
    Ok(())
}

/// ρ ← UρU†
pub fn apply_pulse_density(rho: &mut DensityMatrix, pulse: &Pulse) -> Result<()> {
    let u = pulse.unitary(rho.layout())?;
    let m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    *rho.matrix_mut() = m;
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub max_step: f64,
    /// |‖ψ‖ − 1| (or |Tr ρ − 1|) before the final renormalization.
    pub norm_drift: f64,
}

/// Subintervals of `[t0, t1]` split at breakpoints and pulse times, each with
/// its piece index and the pulses due at its end.
fn spans(g: &dyn Generator, t0: f64, t1: f64, pulses: &[Pulse]) -> Vec<(f64, f64, usize, Vec<Pulse>)> {
    let eps = 1e-13 * t1.abs().max(1e-300);
    let mut cuts: Vec<f64> = g
        .breakpoints()
        .iter()
        .chain(pulses.iter().map(|p| &p.time))
        .copied()
        .filter(|&t| t > t0 + eps && t < t1 - eps)
        .collect();
    cuts.push(t1);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= eps);
    let mut out = Vec::new();
    let mut a = t0;
    for b in cuts {
        let piece = g.breakpoints().partition_point(|&x| x <= a + eps);
        let due: Vec<Pulse> = pulses.iter().filter(|p| (p.time - b).abs() <= eps).copied().collect();
        out.push((a, b, piece, due));
        a = b;
    }
    // pulses exactly at t0 act before anything else
    let at_start: Vec<Pulse> = pulses.iter().filter(|p| (p.time - t0).abs() <= eps && t0 != t1).copied().collect();
    if !at_start.is_empty() {
        let piece = out[0].2;
        out.insert(0, (t0, t0, piece, at_start));
    }
    out
}

/// Fixed-grid or adaptive integration of `sys` across all spans; `hook` runs
/// after every accepted fixed step and `pulse` at every pulse event.
#[allow(clippy::too_many_arguments)]
fn drive(
    sys: &mut dyn OdeSystem,
    g: &dyn Generator,
    x: &mut [C64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    pulses: &[Pulse],
    pulse: &mut dyn FnMut(&Pulse, &mut [C64]) -> Result<()>,
    hook: Option<&mut dyn FnMut(f64, &mut [C64]) -> Result<()>>,
) -> Result<Diagnostics> {
    cfg.validate()?;
    if !(t1 >= t0) {
        return Err(Error::InvalidArgument(format!("t1 = {t1} before t0 = {t0}")));
    }
    let limit = cfg.step_limit(g);
    let mut d = Diagnostics::default();
    let mut hook = hook;
    let mut rk = Rk4::new(sys.len());
    let mut dp = DormandPrince::new(sys.len(), cfg.rtol, cfg.atol, limit.min(t1 - t0).max(f64::MIN_POSITIVE));
    let mut guess = limit.min(1e-3 * (t1 - t0));
    let adaptive = cfg.method == Method::RkAdaptive && hook.is_none();
    for (a, b, piece, due) in spans(g, t0, t1, pulses) {
        if b > a {
            if adaptive {
                guess = dp.integrate(sys, a, b, piece, x, guess)?;
            } else {
                let n = ((b - a) / limit).ceil().max(1.0) as usize;
                let h = (b - a) / n as f64;
                for k in 0..n {
                    let t = a + k as f64 * h;
                    rk.step(sys, t, h, piece, x);
                    if let Some(f) = hook.as_mut() {
                        f(t + h, x)?;
                    }
                }
                d.steps += n;
                d.max_step = d.max_step.max(h);
            }
            if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Integration { time: b, reason: "non-finite amplitudes".into() });
            }
        }
        for p in &due {
            pulse(p, x)?;
        }
    }
    if adaptive {
        d.steps = dp.accepted;
        d.max_step = dp.largest_step;
    }
    Ok(d)
}

fn check_layout(g: &dyn Generator, layout: &crate::qops::HilbertLayout) -> Result<()> {
    if g.layout() != layout {
        return Err(Error::Layout(format!(
            "state layout {:?} does not match model layout {:?}",
            layout.dims(),
            g.layout().dims()
        )));
    }
    Ok(())
}

fn pulse_vector(layout: &crate::qops::HilbertLayout) -> impl FnMut(&Pulse, &mut [C64]) -> Result<()> + '_ {
    move |p, x| {
        let u = SparseOperator::from_operator(&p.unitary(layout)?);
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        u.apply_add(C64::new(1.0, 0.0), x, &mut y);
        x.copy_from_slice(&y);
        Ok(())
    }
}

/// Solves i dψ/dt = H(t)ψ on `[t0, t1]`.
pub fn evolve_state(
    psi0: &StateVector,
    g: &dyn Generator,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<StateVector> {
    Ok(evolve_state_with(psi0, g, t0, t1, cfg, &[])?.0)
}

/// [`evolve_state`] with instantaneous pulses and diagnostics.
pub fn evolve_state_with(
    psi0: &StateVector,
    g: &dyn Generator,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    pulses: &[Pulse],
) -> Result<(StateVector, Diagnostics)> {
    check_layout(g, psi0.layout())?;
    if (psi0.norm() - 1.0).abs() > crate::qops::NORM_TOL {
        return Err(Error::InvalidArgument(format!("initial state norm {} != 1", psi0.norm())));
    }
    let mut sys = Schrodinger::new(g, None)?;
    let mut x = psi0.amplitudes().as_slice().to_vec();
    let layout = psi0.layout().clone();
    let mut d = drive(&mut sys, g, &mut x, t0, t1, cfg, pulses, &mut pulse_vector(&layout), None)?;
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    d.norm_drift = (norm - 1.0).abs();
    if d.norm_drift > NORM_DRIFT_TOL {
        return Err(Error::Integration {
            time: t1,
            reason: format!("norm drift {:.3e} exceeds {NORM_DRIFT_TOL:e}; reduce the step", d.norm_drift),
        });
    }
    let mut psi = StateVector::new(layout, DVector::from_vec(x))?;
    psi.normalize();
    Ok((psi, d))
}

/// Master-equation evolution with the heating dissipators of `channels`.
pub fn evolve_lindblad(
    rho0: &DensityMatrix,
    g: &dyn Generator,
    channels: &[LindbladChannel],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<DensityMatrix> {
    Ok(evolve_lindblad_with(rho0, g, channels, t0, t1, cfg, &[])?.0)
}

#[allow(clippy::too_many_arguments)]
pub fn evolve_lindblad_with(
    rho0: &DensityMatrix,
    g: &dyn Generator,
    channels: &[LindbladChannel],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    pulses: &[Pulse],
) -> Result<(DensityMatrix, Diagnostics)> {
    check_layout(g, rho0.layout())?;
    rho0.validate()?;
    let layout = rho0.layout().clone();
    let mut jumps = Vec::new();
    for ch in channels {
        jumps.extend(ch.jump_operators(&layout)?);
    }
    let mut sys = Lindblad::new(g, &jumps)?;
    let n = layout.total();
    let mut x = rho0.matrix().as_slice().to_vec();
    let mut on_pulse = |p: &Pulse, x: &mut [C64]| -> Result<()> {
        let u = p.unitary(&layout)?;
        let m = DMatrix::from_column_slice(n, n, x);
        let r = u.matrix() * m * u.matrix().adjoint();
        x.copy_from_slice(r.as_slice());
        Ok(())
    };
    let mut d = drive(&mut sys, g, &mut x, t0, t1, cfg, pulses, &mut on_pulse, None)?;
    let mut m = DMatrix::from_column_slice(n, n, &x);
    let tr = m.trace().re;
    d.norm_drift = (tr - 1.0).abs();
    if d.norm_drift > NORM_DRIFT_TOL {
        return Err(Error::Integration { time: t1, reason: format!("trace drift {:.3e}", d.norm_drift) });
    }
    // symmetrize away round-off before the positivity check
    m = (&m + m.adjoint()) * C64::new(0.5 / tr, 0.0);
    let rho = DensityMatrix::new(layout, m)?;
    let min = rho.min_eigenvalue();
    if min < LINDBLAD_POSITIVITY_FLOOR {
        return Err(Error::Integration { time: t1, reason: format!("negative eigenvalue {min:.3e}") });
    }
    Ok((rho, d))
}

/// Quantum-jump unraveling: evolves under H − (i/2)ΣL†L, jumping whenever the
/// squared norm falls below a uniform threshold (checked after each step).
#[allow(clippy::too_many_arguments)]
pub(crate) fn evolve_jumps(
    psi0: &StateVector,
    g: &dyn Generator,
    channels: &[LindbladChannel],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    pulses: &[Pulse],
    rng: &mut impl rand::Rng,
) -> Result<(StateVector, Diagnostics, usize)> {
    check_layout(g, psi0.layout())?;
    let layout = psi0.layout().clone();
    let mut ops = Vec::new();
    for ch in channels {
        ops.extend(ch.jump_operators(&layout)?);
    }
    let mut k = Operator::zeros(&layout);
    for l in &ops {
        k = &k + &(&l.adjoint() * l);
    }
    let jumps: Vec<SparseOperator> = ops.iter().map(SparseOperator::from_operator).collect();
    let mut sys = Schrodinger::new(g, Some(&k))?;
    let mut x = psi0.amplitudes().as_slice().to_vec();
    let mut threshold: f64 = rng.random();
    let mut count = 0usize;
    let mut scratch = vec![C64::new(0.0, 0.0); x.len()];
    let mut hook = |_t: f64, x: &mut [C64]| -> Result<()> {
        let norm2: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        if norm2 > threshold {
            return Ok(());
        }
        let mut weights = Vec::with_capacity(jumps.len());
        let mut results = Vec::with_capacity(jumps.len());
        for l in &jumps {
            scratch.fill(C64::new(0.0, 0.0));
            l.apply_add(C64::new(1.0, 0.0), x, &mut scratch);
            weights.push(scratch.iter().map(|z| z.norm_sqr()).sum::<f64>());
            results.push(scratch.clone());
        }
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = weights.len() - 1;
            for (j, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = j;
                    break;
                }
                u -= w;
            }
            let s = 1.0 / weights[pick].sqrt();
            for (xi, r) in x.iter_mut().zip(&results[pick]) {
                *xi = r * s;
            }
            count += 1;
        }
        threshold = rng.random();
        Ok(())
    };
    let (mut fixed, mut pulse) = (*cfg, pulse_vector(&layout));
    fixed.method = Method::Rk4Fixed;
    let d = drive(&mut sys, g, &mut x, t0, t1, &fixed, pulses, &mut pulse, Some(&mut hook))?;
    drop(pulse);
    let mut psi = StateVector::new(layout, DVector::from_vec(x))?;
    if !(psi.norm() > 0.0) || !psi.is_finite() {
        return Err(Error::Integration { time: t1, reason: "trajectory norm collapsed".into() });
    }
    psi.normalize();
    Ok((psi, d, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::StaticGenerator;
    use crate::qops::{HilbertLayout, QubitState};

    fn qubit_z(omega: f64) -> StaticGenerator {
        let l = HilbertLayout::qubits();
        StaticGenerator::new(&qubit_op(Pauli::Z, 0, &l).unwrap().scale_real(0.5 * omega)).unwrap()
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let l = HilbertLayout::qubits();
        let g = StaticGenerator::new(&Operator::zeros(&l)).unwrap();
        let psi = StateVector::basis(&l, &[0, 1]).unwrap();
        let out = evolve_state(&psi, &g, 0.0, 1.0, &IntegratorConfig::default()).unwrap();
        assert!((out.inner(&psi).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn static_sigma_z_phases() {
        let l = HilbertLayout::qubits();
        let w = 2.0 * PI * 1e4;
        let t = 3.3e-4;
        let mut amps = DVector::from_element(4, C64::new(0.0, 0.0));
        amps[0] = C64::new(FRAC, 0.0);
        amps[2] = C64::new(FRAC, 0.0);
        let psi = StateVector::new(l.clone(), amps).unwrap();
        for method in [Method::Rk4Fixed, Method::RkAdaptive] {
            let cfg = IntegratorConfig { method, dt: Some(t / 4000.0), ..Default::default() };
            let out = evolve_state(&psi, &qubit_z(w), 0.0, t, &cfg).unwrap();
            let e = out.amplitudes()[0] / FRAC;
            let g = out.amplitudes()[2] / FRAC;
            assert!((e - C64::new(0.0, -0.5 * w * t).exp()).norm() < 1e-9, "{method:?}");
            assert!((g - C64::new(0.0, 0.5 * w * t).exp()).norm() < 1e-9, "{method:?}");
        }
    }
    const FRAC: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn pi_pulses_on_qubit_one() {
        let l = HilbertLayout::qubits();
        let p = Pulse::refocusing(&[0.0])[0];
        let mut psi = StateVector::qubits_with_fock(&l, QubitState::Ground, QubitState::Ground, &[]).unwrap();
        apply_instantaneous_pulse(&mut psi, &p).unwrap();
        let eg = StateVector::qubits_with_fock(&l, QubitState::Excited, QubitState::Ground, &[]).unwrap();
        assert!((eg.inner(&psi).norm() - 1.0).abs() < 1e-15);
        let u = p.unitary(&l).unwrap();
        let twice = &u * &u;
        assert!(twice.max_abs_diff(&Operator::identity(&l).scale_real(-1.0)) < 1e-15);
        let sx = qubit_op(Pauli::X, 0, &l).unwrap();
        let conj = &(&u * &sx) * &u.adjoint();
        assert!(conj.max_abs_diff(&sx.scale_real(-1.0)) < 1e-12);
        let sz = qubit_op(Pauli::Z, 0, &l).unwrap();
        assert!((&(&u * &sz) * &u.adjoint()).max_abs_diff(&sz.scale_real(-1.0)) < 1e-12);
    }

    #[test]
    fn lindblad_matches_pure_evolution_without_channels() {
        let l = HilbertLayout::qubits();
        let h = &qubit_op(Pauli::X, 0, &l).unwrap().scale_real(3e3) + &qubit_op(Pauli::Z, 1, &l).unwrap().scale_real(1e3);
        let g = StaticGenerator::new(&h).unwrap();
        let psi = StateVector::basis(&l, &[1, 1]).unwrap();
        let cfg = IntegratorConfig { dt: Some(1e-7), ..Default::default() };
        let pure = evolve_state(&psi, &g, 0.0, 1e-3, &cfg).unwrap().to_density();
        let mixed = evolve_lindblad(&psi.to_density(), &g, &[], 0.0, 1e-3, &cfg).unwrap();
        assert!((pure.matrix() - mixed.matrix()).iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn spans_split_at_pulses_and_breakpoints() {
        let g = qubit_z(1.0);
        let pulses = Pulse::refocusing(&[0.5, 1.0]);
        let s = spans(&g, 0.0, 1.0, &pulses);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].3.len(), 1);
        assert_eq!(s[1].3.len(), 1);
        assert_eq!(s[1].1, 1.0);
    }
}
